#include "ktbt/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

namespace ktbt {

namespace {

[[noreturn]] void fail(std::size_t line, std::string_view key, const std::string& what) {
  throw ConfigParseError("line " + std::to_string(line) + ": " + std::string(key) + ": " + what);
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = s.find(',', start);
    out.emplace_back(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T value{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) return std::nullopt;
  }
  return value;
}

template <typename T>
T number(std::size_t line, std::string_view key, std::string_view text, const char* kind) {
  auto v = parse_number<T>(text);
  if (!v) fail(line, key, std::string("expected ") + kind + ", got '" + std::string(text) + "'");
  return *v;
}

template <std::size_t N>
std::array<int, N> int_list(std::size_t line, std::string_view key, std::string_view text) {
  const auto parts = split_list(text);
  if (parts.size() != N) fail(line, key, std::string(key) + " requires " + std::to_string(N) + " values");
  std::array<int, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = number<int>(line, key, parts[i], "a nonnegative integer");
    if (out[i] < 0) fail(line, key, "values must be nonnegative");
  }
  return out;
}

bool boolean(std::size_t line, std::string_view key, std::string_view text) {
  const std::string v = lower(text);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(line, key, "expected a boolean, got '" + std::string(text) + "'");
}

const std::set<std::string, std::less<>> kKeys = {
    "mode",   "composition", "targets", "d_coms",   "obstacles", "iterations", "trials",       "seed",      "arena",
    "speed",  "d_t",         "d_c",     "t1_limit", "t2_limit",  "study",      "study_values", "output_dir"};

void apply(ExperimentSpec& spec, std::size_t line, const std::string& key, const std::string& value) {
  SimConfig& c = spec.config;
  if (key == "mode") {
    const std::string v = lower(value);
    if (v == "nt" || v == "no_transfer" || v == "notransfer") {
      c.mode = TransferMode::NoTransfer;
    } else if (v == "ktbt" || v == "kt-bt" || v == "kt_bt") {
      c.mode = TransferMode::KtBt;
    } else {
      fail(line, key, "expected nt or ktbt, got '" + value + "'");
    }
  } else if (key == "composition") {
    c.composition = int_list<6>(line, key, value);
  } else if (key == "targets") {
    c.targets = int_list<4>(line, key, value);
  } else if (key == "d_coms") {
    c.d_coms = number<double>(line, key, value, "a number");
  } else if (key == "obstacles") {
    c.obstacles = boolean(line, key, value);
  } else if (key == "iterations") {
    c.iterations = number<Tick>(line, key, value, "a nonnegative integer");
  } else if (key == "trials") {
    c.trials = number<int>(line, key, value, "an integer");
  } else if (key == "seed") {
    c.seed = number<std::uint64_t>(line, key, value, "a nonnegative integer");
  } else if (key == "arena") {
    const auto parts = split_list(value);
    if (parts.size() != 1 && parts.size() != 2) fail(line, key, "arena requires 1 or 2 values");
    c.arena_width = number<double>(line, key, parts[0], "a number");
    c.arena_height = parts.size() == 2 ? number<double>(line, key, parts[1], "a number") : c.arena_width;
  } else if (key == "speed") {
    c.speed = number<double>(line, key, value, "a number");
  } else if (key == "d_t") {
    c.d_t = number<double>(line, key, value, "a number");
  } else if (key == "d_c") {
    c.d_c = number<double>(line, key, value, "a number");
  } else if (key == "t1_limit") {
    c.t1_limit = number<Tick>(line, key, value, "a nonnegative integer");
  } else if (key == "t2_limit") {
    c.t2_limit = number<Tick>(line, key, value, "a nonnegative integer");
  } else if (key == "study") {
    const std::string v = lower(value);
    if (v == "none" || v == "run") {
      spec.study = Study::None;
    } else if (v == "compare") {
      spec.study = Study::Compare;
    } else if (v == "opportunities") {
      spec.study = Study::Opportunities;
    } else if (v == "comm_range") {
      spec.study = Study::CommRange;
    } else if (v == "heterogeneity") {
      spec.study = Study::Heterogeneity;
    } else {
      fail(line, key, "unknown study '" + value + "'");
    }
  } else if (key == "study_values") {
    spec.study_values = split_list(value);
    for (auto& v : spec.study_values) {
      if (v.empty()) fail(line, key, "empty list element");
    }
  } else if (key == "output_dir") {
    if (value.empty()) fail(line, key, "empty path");
    spec.output_dir = value;
  }
}

void check_study(ExperimentSpec& spec, std::size_t study_line) {
  const std::size_t line = study_line;
  switch (spec.study) {
    case Study::None:
    case Study::Heterogeneity:
      if (!spec.study_values.empty()) fail(line, "study_values", "not used by this study");
      break;
    case Study::Compare:
      if (spec.study_values.empty()) spec.study_values = {"bl1", "bl2", "ktbt"};
      for (auto& v : spec.study_values) {
        v = lower(v);
        if (v != "bl1" && v != "bl2" && v != "ktbt") fail(line, "study_values", "unknown variant '" + v + "'");
      }
      break;
    case Study::Opportunities:
      if (spec.study_values.empty()) fail(line, "study_values", "required for opportunities");
      for (const auto& v : spec.study_values) {
        auto n = parse_number<int>(v);
        if (!n || *n < 0) fail(line, "study_values", "expected nonnegative target counts, got '" + v + "'");
      }
      break;
    case Study::CommRange:
      if (spec.study_values.empty()) fail(line, "study_values", "required for comm_range");
      for (const auto& v : spec.study_values) {
        auto d = parse_number<double>(v);
        if (!d || *d < 0.0) fail(line, "study_values", "expected nonnegative ranges, got '" + v + "'");
      }
      break;
  }
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

constexpr const char* kCsvHeader =
    "tick,collected_pct,knows0,knows1,knows2,knows3,knows4,complexity,disparity,heterogeneity,knowledge_score,"
    "queries_sent,queries_lost,responses_sent\n";

}  // namespace

const char* to_string(Study s) {
  switch (s) {
    case Study::None: return "none";
    case Study::Compare: return "compare";
    case Study::Opportunities: return "opportunities";
    case Study::CommRange: return "comm_range";
    case Study::Heterogeneity: return "heterogeneity";
  }
  return "?";
}

ExperimentSpec parse_config(std::istream& in) {
  ExperimentSpec spec;
  std::map<std::string, std::size_t, std::less<>> seen;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (auto hash = text.find('#'); hash != std::string::npos) text.erase(hash);
    std::istringstream words(text);
    std::string word;
    while (words >> word) {
      const auto eq = word.find('=');
      if (eq == std::string::npos || eq == 0) {
        throw ConfigParseError("line " + std::to_string(line_no) + ": expected key=value, got '" + word + "'");
      }
      const std::string key = lower(word.substr(0, eq));
      const std::string value = word.substr(eq + 1);
      if (!kKeys.contains(key)) fail(line_no, key, "unknown key");
      if (auto it = seen.find(key); it != seen.end()) {
        fail(line_no, key, "duplicate key (first set on line " + std::to_string(it->second) + ")");
      }
      if (value.empty()) fail(line_no, key, "missing value");
      seen.emplace(key, line_no);
      apply(spec, line_no, key, value);
    }
  }
  for (const char* required : {"composition", "targets"}) {
    if (!seen.contains(required)) throw ConfigParseError(std::string("missing required key: ") + required);
  }
  const auto study_line = seen.contains("study_values") ? seen["study_values"] : seen.contains("study") ? seen["study"] : 0;
  check_study(spec, study_line);
  spec.config.validate();
  return spec;
}

ExperimentSpec load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

std::vector<Variant> expand_variants(const ExperimentSpec& spec) {
  std::vector<Variant> out;
  const SimConfig& base = spec.config;
  switch (spec.study) {
    case Study::None:
      out.push_back({"run", base});
      break;
    case Study::Heterogeneity:
      out.push_back({"heterogeneity", base});
      break;
    case Study::Compare:
      for (const auto& v : spec.study_values) {
        SimConfig c = base;
        if (v == "bl1") {
          c.composition = {0, base.robot_count(), 0, 0, 0, 0};
          c.mode = TransferMode::NoTransfer;
        } else if (v == "bl2") {
          c.mode = TransferMode::NoTransfer;
        } else {
          c.mode = TransferMode::KtBt;
        }
        out.push_back({v, c});
      }
      break;
    case Study::Opportunities:
      for (const auto& v : spec.study_values) {
        SimConfig c = base;
        const int n = *parse_number<int>(v);
        c.targets = {n, n, n, n};
        out.push_back({"targets_" + v, c});
      }
      break;
    case Study::CommRange:
      for (const auto& v : spec.study_values) {
        SimConfig c = base;
        c.d_coms = *parse_number<double>(v);
        out.push_back({"dcoms_" + v, c});
      }
      break;
  }
  for (const auto& v : out) v.config.validate();
  return out;
}

unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("KTBT_THREADS")) {
    if (auto cap = parse_number<unsigned>(env); cap && *cap > 0) n = std::min(n, *cap);
  }
  return n;
}

std::vector<VariantResult> run_variants(const std::vector<Variant>& variants, unsigned workers) {
  struct Job {
    std::size_t variant;
    std::size_t trial;
  };
  std::vector<VariantResult> results;
  std::vector<Job> jobs;
  for (std::size_t v = 0; v < variants.size(); ++v) {
    results.push_back({variants[v], std::vector<TrialResult>(static_cast<std::size_t>(variants[v].config.trials))});
    for (std::size_t t = 0; t < results.back().trials.size(); ++t) jobs.push_back({v, t});
  }
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      try {
        results[jobs[j].variant].trials[jobs[j].trial] = run_trial(variants[jobs[j].variant].config, jobs[j].trial);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const unsigned n = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(jobs.size())));
    for (unsigned i = 0; i < n; ++i) pool.emplace_back(work);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::string trial_csv(const TrialResult& trial) {
  std::string out = kCsvHeader;
  for (const SampleRow& r : trial.series) {
    out += std::to_string(r.tick) + ',' + fmt(r.collected_pct);
    for (int k : r.knows) out += ',' + std::to_string(k);
    out += ',' + fmt(r.complexity) + ',' + fmt(r.disparity) + ',' + fmt(r.heterogeneity) + ',' +
           fmt(r.knowledge_score) + ',' + std::to_string(r.queries_sent) + ',' + std::to_string(r.queries_lost) +
           ',' + std::to_string(r.responses_sent) + '\n';
  }
  return out;
}

std::string aggregate_csv(const std::vector<TrialResult>& trials, Tick sample_interval) {
  std::string out = kCsvHeader;
  if (trials.empty()) return out;
  Tick end = 0;
  for (const auto& t : trials) end = std::max(end, t.series.back().tick);
  std::vector<Tick> grid;
  for (Tick t = 0; t <= end; t += sample_interval) grid.push_back(t);
  if (grid.back() != end) grid.push_back(end);

  std::vector<std::size_t> cursor(trials.size(), 0);
  const double n = static_cast<double>(trials.size());
  for (Tick g : grid) {
    std::array<double, 13> sum{};
    for (std::size_t i = 0; i < trials.size(); ++i) {
      const auto& s = trials[i].series;
      while (cursor[i] + 1 < s.size() && s[cursor[i] + 1].tick <= g) ++cursor[i];
      const SampleRow& r = s[cursor[i]];
      sum[0] += r.collected_pct;
      for (std::size_t k = 0; k < 5; ++k) sum[1 + k] += r.knows[k];
      sum[6] += r.complexity;
      sum[7] += r.disparity;
      sum[8] += r.heterogeneity;
      sum[9] += r.knowledge_score;
      sum[10] += static_cast<double>(r.queries_sent);
      sum[11] += static_cast<double>(r.queries_lost);
      sum[12] += static_cast<double>(r.responses_sent);
    }
    out += std::to_string(g);
    for (double v : sum) out += ',' + fmt(v / n);
    out += '\n';
  }
  return out;
}

MeanSd mean_sd(const std::vector<double>& values) {
  MeanSd r;
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  r.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.sd = std::sqrt(ss / (n - 1.0));
  }
  return r;
}

double censored_ticks_to_99(const TrialResult& trial, const SimConfig& config) {
  return static_cast<double>(trial.ticks_to_99.value_or(config.iterations));
}

std::string summarize(const ExperimentSpec& spec, const std::vector<VariantResult>& results) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << "study " << to_string(spec.study) << ", trials " << spec.config.trials << ", iterations "
      << spec.config.iterations << ", seed " << spec.config.seed << "\n";
  out << "ticks_to_99 counts a trial that never reached 99% as the full iteration budget\n";
  out << "queries_lost: reached no robot holding the answer; queries_unheard: reached no robot at all\n\n";

  auto stat = [&](const VariantResult& v, auto field) {
    std::vector<double> xs;
    for (const auto& t : v.trials) xs.push_back(field(t));
    const MeanSd m = mean_sd(xs);
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << m.mean << " +- " << m.sd;
    return s.str();
  };

  std::vector<std::pair<double, std::string>> ordering;
  for (const auto& v : results) {
    std::size_t reached = 0;
    std::vector<double> t99;
    for (const auto& t : v.trials) {
      if (t.ticks_to_99) ++reached;
      t99.push_back(censored_ticks_to_99(t, v.variant.config));
    }
    ordering.emplace_back(mean_sd(t99).mean, v.variant.name);
    out << v.variant.name << "\n";
    out << "  ticks_to_99      " << stat(v, [&](const TrialResult& t) { return censored_ticks_to_99(t, v.variant.config); })
        << "  (reached in " << reached << "/" << v.trials.size() << ")\n";
    out << "  collected_pct    " << stat(v, [](const TrialResult& t) { return t.series.back().collected_pct; }) << "\n";
    out << "  knows4           "
        << stat(v, [](const TrialResult& t) { return static_cast<double>(t.series.back().knows[4]); }) << "\n";
    out << "  knowledge_score  " << stat(v, [](const TrialResult& t) { return t.series.back().knowledge_score; }) << "\n";
    out << "  heterogeneity    " << stat(v, [](const TrialResult& t) { return t.series.back().heterogeneity; }) << "\n";
    out << "  queries_sent     "
        << stat(v, [](const TrialResult& t) { return static_cast<double>(t.comms.queries_sent); }) << "\n";
    out << "  queries_lost     "
        << stat(v, [](const TrialResult& t) { return static_cast<double>(t.comms.queries_lost); }) << "\n";
    out << "  queries_unheard  "
        << stat(v, [](const TrialResult& t) { return static_cast<double>(t.comms.queries_unheard); }) << "\n";
    out << "  responses_sent   "
        << stat(v, [](const TrialResult& t) { return static_cast<double>(t.comms.responses_sent); }) << "\n";
  }
  if (results.size() > 1) {
    std::stable_sort(ordering.begin(), ordering.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    out << "\nordering by mean ticks_to_99:";
    for (std::size_t i = 0; i < ordering.size(); ++i) out << (i ? " < " : " ") << ordering[i].second;
    out << "\n";
  }
  return out.str();
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  const auto variants = expand_variants(spec);
  ExperimentReport report;
  report.variants = run_variants(variants, worker_count());
  report.summary = summarize(spec, report.variants);

  namespace fs = std::filesystem;
  fs::create_directories(spec.output_dir);
  for (const auto& v : report.variants) {
    const fs::path dir = spec.output_dir / v.variant.name;
    fs::create_directories(dir);
    for (std::size_t t = 0; t < v.trials.size(); ++t) {
      write_file(dir / ("trial_" + std::to_string(t) + ".csv"), trial_csv(v.trials[t]));
    }
    write_file(spec.output_dir / (v.variant.name + "_aggregate.csv"),
               aggregate_csv(v.trials, v.variant.config.sample_interval));
  }
  write_file(spec.output_dir / "summary.txt", report.summary);
  return report;
}

}  // namespace ktbt
