#include "dspg/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <climits>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dspg {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

class Parser {
 public:
  explicit Parser(const std::string& text) {
    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos) {
        line.erase(hash);
      }
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        issues.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || value.empty()) {
        issues.push_back("line " + std::to_string(lineno) + ": empty key or value");
        continue;
      }
      if (entries.count(key)) {
        issues.push_back("duplicate key '" + key + "'");
        continue;
      }
      entries[key] = value;
    }
  }

  bool has(const std::string& key) {
    if (entries.count(key)) {
      seen.insert(entries.find(key)->first);
      return true;
    }
    return false;
  }

  std::optional<std::string> raw(const std::string& key) {
    auto it = entries.find(key);
    if (it == entries.end()) return std::nullopt;
    seen.insert(it->first);
    return it->second;
  }

  template <typename T>
  std::optional<T> number(const std::string& key) {
    auto value = raw(key);
    if (!value) return std::nullopt;
    T out{};
    if (!parse_number(*value, out)) {
      issues.push_back("key '" + key + "': expected a number, got '" + *value + "'");
      return std::nullopt;
    }
    return out;
  }

  std::optional<bool> boolean(const std::string& key) {
    auto value = raw(key);
    if (!value) return std::nullopt;
    if (*value == "true") return true;
    if (*value == "false") return false;
    issues.push_back("key '" + key + "': expected true or false, got '" + *value + "'");
    return std::nullopt;
  }

  // Scalar, [v1, v2, ...] or [lo:hi:step] (hi inclusive within step/2).
  std::optional<std::vector<double>> number_list(const std::string& key) {
    auto value = raw(key);
    if (!value) return std::nullopt;
    std::vector<double> out;
    const std::string& v = *value;
    if (v.front() != '[') {
      double scalar = 0.0;
      if (!parse_number(v, scalar)) {
        issues.push_back("key '" + key + "': expected a number or list, got '" + v + "'");
        return std::nullopt;
      }
      out.push_back(scalar);
      return out;
    }
    if (v.back() != ']') {
      issues.push_back("key '" + key + "': unterminated list");
      return std::nullopt;
    }
    const std::string body = trim(v.substr(1, v.size() - 2));
    if (body.empty()) {
      issues.push_back("key '" + key + "': list must not be empty");
      return std::nullopt;
    }
    if (body.find(':') != std::string::npos && body.find(',') == std::string::npos) {
      std::string lo_s, hi_s, step_s;
      double lo = 0, hi = 0, step = 0;
      if (!parse_range(body, lo_s, hi_s, step_s) || !parse_number(lo_s, lo) ||
          !parse_number(hi_s, hi) || !parse_number(step_s, step) || step <= 0.0 || hi < lo) {
        issues.push_back("key '" + key + "': range syntax is [lo:hi:step] with step > 0");
        return std::nullopt;
      }
      // Plain decimal endpoints walk the grid in scaled integers so that
      // [0.1:10:0.1] yields 0.3, not an accumulated 0.30000000000000004.
      const int dp_lo = decimal_places(lo_s);
      const int dp_hi = decimal_places(hi_s);
      const int dp_step = decimal_places(step_s);
      const int dp = std::max({dp_lo, dp_hi, dp_step});
      if (dp_lo >= 0 && dp_hi >= 0 && dp_step >= 0 && dp <= 12) {
        const double scale = std::pow(10.0, dp);
        const auto ilo = std::llround(lo * scale);
        const auto ihi = std::llround(hi * scale);
        const auto istep = std::llround(step * scale);
        for (auto v = ilo; v <= ihi; v += istep) {
          out.push_back(static_cast<double>(v) / scale);
        }
      } else {
        for (double x = lo; x <= hi + step / 2.0; x += step) {
          out.push_back(x);
        }
      }
      return out;
    }
    std::istringstream items(body);
    std::string item;
    while (std::getline(items, item, ',')) {
      item = trim(item);
      double x = 0.0;
      if (!parse_number(item, x)) {
        issues.push_back("key '" + key + "': bad list element '" + item + "'");
        return std::nullopt;
      }
      out.push_back(x);
    }
    return out;
  }

  void reject_unknown() {
    for (const auto& [key, value] : entries) {
      if (!seen.count(key)) {
        issues.push_back("unknown key '" + key + "'");
      }
    }
  }

  std::vector<std::string> issues;

 private:
  static bool parse_number(const std::string& s, double& out) {
    try {
      std::size_t used = 0;
      out = std::stod(s, &used);
      return used == s.size();
    } catch (...) {
      return false;
    }
  }

  static bool parse_number(const std::string& s, std::int64_t& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
  }

  static bool parse_number(const std::string& s, std::uint64_t& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
  }

  static bool parse_number(const std::string& s, int& out) {
    std::int64_t wide = 0;
    if (!parse_number(s, wide)) return false;
    if (wide < INT_MIN || wide > INT_MAX) return false;
    out = static_cast<int>(wide);
    return true;
  }

  static bool parse_range(const std::string& body, std::string& lo, std::string& hi,
                          std::string& step) {
    const auto c1 = body.find(':');
    const auto c2 = body.find(':', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) return false;
    lo = trim(body.substr(0, c1));
    hi = trim(body.substr(c1 + 1, c2 - c1 - 1));
    step = trim(body.substr(c2 + 1));
    return !lo.empty() && !hi.empty() && !step.empty();
  }

  // Digits after the decimal point for plain decimal literals; -1 when the
  // literal uses an exponent or other non-decimal form.
  static int decimal_places(const std::string& s) {
    if (s.find('e') != std::string::npos || s.find('E') != std::string::npos) return -1;
    const auto dot = s.find('.');
    return dot == std::string::npos ? 0 : static_cast<int>(s.size() - dot - 1);
  }

  std::map<std::string, std::string> entries;
  std::set<std::string> seen;
};

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  Parser p(text);
  ExperimentConfig cfg;

  if (auto mode = p.raw("mode")) {
    if (*mode == "dspg") {
      cfg.mode = RunMode::kDspg;
    } else if (*mode == "consensus") {
      cfg.mode = RunMode::kConsensus;
    } else if (*mode == "diagnostics") {
      cfg.mode = RunMode::kDiagnostics;
    } else {
      p.issues.push_back("mode must be dspg, consensus or diagnostics, got '" + *mode + "'");
    }
  } else {
    p.issues.push_back("missing required key 'mode'");
  }

  if (auto d = p.number<int>("d")) {
    cfg.d = *d;
    if (cfg.d < 1) p.issues.push_back("d must be at least 1, got " + std::to_string(cfg.d));
  } else if (!p.has("d")) {
    p.issues.push_back("missing required key 'd'");
  }

  if (auto obj = p.raw("objective")) {
    if (*obj == "quadratic-random") {
      cfg.objective.kind = ObjectiveKind::kQuadraticRandom;
    } else if (*obj == "quartic-1d") {
      cfg.objective.kind = ObjectiveKind::kQuartic1d;
      if (cfg.d != 1) p.issues.push_back("objective quartic-1d requires d = 1");
    } else {
      p.issues.push_back("objective must be quadratic-random or quartic-1d, got '" + *obj + "'");
    }
  } else {
    p.issues.push_back("missing required key 'objective'");
  }
  if (auto oseed = p.number<std::uint64_t>("objective_seed")) {
    cfg.objective.seed = *oseed;
  }
  if (auto xs = p.number_list("x_star")) {
    if (static_cast<int>(xs->size()) != cfg.d) {
      p.issues.push_back("x_star must list exactly d values");
    } else {
      cfg.objective.x_star = Eigen::Map<const Vector>(xs->data(), cfg.d);
    }
  }

  if (auto c = p.number_list("c")) {
    cfg.c_values = *c;
    for (double v : cfg.c_values) {
      if (!(v > 0.0)) {
        p.issues.push_back("c values must be positive, got " + std::to_string(v));
        break;
      }
    }
  } else if (!p.has("c")) {
    p.issues.push_back("missing required key 'c'");
  }

  if (auto pc = p.number_list("p_c")) {
    cfg.p_values = *pc;
    for (double v : cfg.p_values) {
      if (!(v > 0.0 && v <= 1.0)) {
        p.issues.push_back("p_c must lie in (0, 1], got " + std::to_string(v));
        break;
      }
    }
  } else if (!p.has("p_c")) {
    p.issues.push_back("missing required key 'p_c'");
  }

  if (auto act = p.raw("activation")) {
    if (*act == "all-active") {
      cfg.activation.kind = ActivationKind::kAllActive;
    } else if (*act == "bernoulli") {
      cfg.activation.kind = ActivationKind::kBernoulli;
    } else if (*act == "round-robin") {
      cfg.activation.kind = ActivationKind::kRoundRobin;
    } else {
      p.issues.push_back("activation must be all-active, bernoulli or round-robin");
    }
  }
  if (auto pa = p.number<double>("p_active")) {
    cfg.activation.p_active = *pa;
    if (!(*pa > 0.0 && *pa <= 1.0)) {
      p.issues.push_back("p_active must lie in (0, 1], got " + std::to_string(*pa));
    }
  }

  if (auto sched = p.raw("schedule")) {
    if (*sched == "constant") {
      cfg.schedule.kind = ScheduleKind::kConstant;
    } else if (*sched == "diminishing") {
      cfg.schedule.kind = ScheduleKind::kDiminishing;
      cfg.schedule.a = 1.0;
      cfg.schedule.b = 1.0;
    } else if (*sched == "hybrid") {
      cfg.schedule.kind = ScheduleKind::kHybrid;
    } else {
      p.issues.push_back("schedule must be constant, diminishing or hybrid");
    }
  } else {
    p.issues.push_back("missing required key 'schedule'");
  }
  if (auto g0 = p.number<double>("gamma0")) cfg.schedule.gamma0 = *g0;
  if (auto sw = p.number<std::int64_t>("switch_tick")) cfg.schedule.switch_tick = *sw;
  if (auto a = p.number<double>("a")) cfg.schedule.a = *a;
  if (auto b = p.number<double>("b")) cfg.schedule.b = *b;
  if (auto off = p.boolean("hybrid_offset")) cfg.schedule.offset_at_switch = *off;

  if (auto n = p.number<std::int64_t>("iterations")) {
    cfg.iterations = *n;
    if (cfg.iterations < 0) p.issues.push_back("iterations must be nonnegative");
  } else if (!p.has("iterations")) {
    p.issues.push_back("missing required key 'iterations'");
  }

  if (auto t = p.number<int>("trials")) {
    cfg.trials = *t;
    if (cfg.trials < 1) p.issues.push_back("trials must be at least 1, got " + std::to_string(*t));
  } else if (!p.has("trials")) {
    p.issues.push_back("missing required key 'trials'");
  }

  if (auto seed = p.number<std::uint64_t>("master_seed")) {
    cfg.master_seed = *seed;
  } else if (!p.has("master_seed")) {
    p.issues.push_back("missing required key 'master_seed'");
  }

  if (auto stride = p.number<int>("subsample_stride")) {
    cfg.subsample_stride = *stride;
    if (cfg.subsample_stride < 1) p.issues.push_back("subsample_stride must be at least 1");
  }
  if (auto out = p.raw("output_path")) cfg.output_path = *out;

  if (auto dm = p.raw("delay_mode")) {
    if (*dm == "erasure-latest") {
      cfg.delay_mode = ChannelMode::kErasureLatest;
    } else if (*dm == "delayed-queue") {
      cfg.delay_mode = ChannelMode::kDelayedQueue;
    } else {
      p.issues.push_back("delay_mode must be erasure-latest or delayed-queue");
    }
  }
  if (auto mqd = p.number<int>("max_queue_delay")) {
    cfg.max_queue_delay = *mqd;
    if (*mqd < 1) p.issues.push_back("max_queue_delay must be a positive tick count");
  }
  if (cfg.delay_mode == ChannelMode::kDelayedQueue && !cfg.max_queue_delay) {
    p.issues.push_back("delay_mode delayed-queue requires max_queue_delay");
  }
  if (cfg.delay_mode == ChannelMode::kErasureLatest && cfg.max_queue_delay) {
    p.issues.push_back("max_queue_delay is only meaningful with delay_mode = delayed-queue");
  }

  if (auto ov = p.raw("p_overrides")) {
    // [from>to:p, ...]
    std::string v = *ov;
    if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
      p.issues.push_back("p_overrides expects [from>to:p, ...]");
    } else {
      std::istringstream items(v.substr(1, v.size() - 2));
      std::string item;
      while (std::getline(items, item, ',')) {
        item = trim(item);
        const auto gt = item.find('>');
        const auto colon = item.find(':', gt == std::string::npos ? 0 : gt);
        if (gt == std::string::npos || colon == std::string::npos) {
          p.issues.push_back("p_overrides entry '" + item + "' is not from>to:p");
          continue;
        }
        try {
          PairOverride po;
          po.from = std::stoi(trim(item.substr(0, gt)));
          po.to = std::stoi(trim(item.substr(gt + 1, colon - gt - 1)));
          po.p_success = std::stod(trim(item.substr(colon + 1)));
          cfg.p_overrides.push_back(po);
        } catch (...) {
          p.issues.push_back("p_overrides entry '" + item + "' is not from>to:p");
        }
      }
    }
  }

  if (auto init = p.number_list("init")) {
    if (static_cast<int>(init->size()) != cfg.d) {
      p.issues.push_back("init must list exactly d values");
    } else {
      cfg.init = Eigen::Map<const Vector>(init->data(), cfg.d);
    }
  }

  if (auto probes = p.number<int>("diag_probes")) {
    cfg.diag_probes = *probes;
    if (*probes < 1) p.issues.push_back("diag_probes must be at least 1");
  }
  if (auto box = p.number<double>("diag_box")) {
    cfg.diag_box = *box;
    if (!(*box > 0.0)) p.issues.push_back("diag_box must be positive");
  }
  if (auto dx = p.number_list("diag_x")) {
    cfg.diag_x = *dx;
    if (cfg.d != 1) p.issues.push_back("diag_x probe points require d = 1");
  }
  if (auto ds = p.number<std::int64_t>("diag_samples")) {
    cfg.diag_samples = *ds;
    if (*ds < 2) p.issues.push_back("diag_samples must be at least 2");
  }

  p.reject_unknown();

  if (cfg.mode == RunMode::kDiagnostics && cfg.d > kEnumerationLimit) {
    p.issues.push_back("diagnostics mode enumerates 2^d patterns and requires d <= " +
                       std::to_string(kEnumerationLimit));
  }

  const double total_trials = static_cast<double>(cfg.c_values.size()) *
                              static_cast<double>(cfg.p_values.size()) *
                              static_cast<double>(cfg.trials);
  if (total_trials > 1e6) {
    p.issues.push_back("grid refuses more than 1e6 total trials, got " +
                       std::to_string(static_cast<std::uint64_t>(total_trials)));
  }

  if (p.issues.empty()) {
    try {
      cfg.schedule.validate();
    } catch (const ConfigError& e) {
      for (const auto& issue : e.issues()) p.issues.push_back(issue);
    }
  }

  if (!p.issues.empty()) {
    throw ConfigError(std::move(p.issues));
  }
  return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError({"cannot open config file: " + path.string()});
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace dspg
