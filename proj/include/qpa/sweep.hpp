#pragma once

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qpa/montecarlo.hpp"
#include "qpa/version.hpp"

namespace qpa {

// Anything wrong with user-supplied configuration, as opposed to a failure
// while computing. The CLI maps this to its own exit code.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Closed interval walked in fixed steps, endpoints included.
struct Range {
  double min = 0.0;
  double max = 0.4;
  double step = 0.005;

  std::size_t count() const {
    if (!(step > 0.0)) throw ConfigError("range step must be positive");
    return static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1;
  }

  double at(std::size_t i) const { return min + static_cast<double>(i) * step; }
};

enum class SweepMode { Analytic, MonteCarlo };

inline std::string_view sweep_mode_name(SweepMode m) {
  return m == SweepMode::Analytic ? "analytic" : "montecarlo";
}

inline SweepMode sweep_mode_from_name(std::string_view name) {
  if (name == "analytic") return SweepMode::Analytic;
  if (name == "montecarlo") return SweepMode::MonteCarlo;
  throw ConfigError("unknown sweep mode '" + std::string(name) +
                    "' (expected 'analytic' or 'montecarlo')");
}

namespace detail {

inline void check_keys(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                       const char* context) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError(std::string("unknown key '") + item.key() + "' in " + context);
    }
  }
}

template <typename T>
T get_or(const nlohmann::json& obj, const char* key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

}  // namespace detail

struct SweepConfig {
  Range p_range{0.0, 0.4, 0.005};
  Range q_range{0.0, 0.4, 0.005};
  SweepMode mode = SweepMode::Analytic;
  std::optional<McConfig> mc;
  double v_pol = 0.0;
  double v_et = 0.0;
  std::string output_dir = "qpa-out";
  bool emit_plots = false;

  void validate() const {
    auto check_range = [](const Range& r, const char* name) {
      if (!(r.min >= 0.0 && r.max <= 1.0 && r.min <= r.max)) {
        throw ConfigError(std::string(name) + ": bounds must satisfy 0 <= min <= max <= 1");
      }
      if (!(r.step > 0.0)) throw ConfigError(std::string(name) + ": step must be positive");
    };
    check_range(p_range, "p_range");
    check_range(q_range, "q_range");
    if (p_range.count() * q_range.count() > 10'000'000) {
      throw ConfigError("grid exceeds 10^7 points");
    }
    if (!(v_pol >= 0.0 && v_pol <= 1.0 && v_et >= 0.0 && v_et <= 1.0)) {
      throw ConfigError("intrinsic error weights must lie in [0, 1]");
    }
    if (mode == SweepMode::MonteCarlo) {
      if (!mc.has_value()) throw ConfigError("montecarlo mode requires an 'mc' block");
      if (mc->n_pairs == 0) throw ConfigError("mc.n_pairs must be positive");
    }
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["p_range"] = {{"min", p_range.min}, {"max", p_range.max}, {"step", p_range.step}};
    j["q_range"] = {{"min", q_range.min}, {"max", q_range.max}, {"step", q_range.step}};
    j["mode"] = std::string(sweep_mode_name(mode));
    if (mc.has_value()) {
      j["mc"] = {{"n_pairs", mc->n_pairs},
                 {"seed", mc->seed},
                 {"apply_franson_loss", mc->apply_franson_loss}};
    }
    j["intrinsic"] = {{"v_pol", v_pol}, {"v_et", v_et}};
    j["output_dir"] = output_dir;
    j["emit_plots"] = emit_plots;
    return j;
  }

  // Fail-closed parsing: unknown keys are configuration errors, not warnings.
  static SweepConfig from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config root must be an object");
    detail::check_keys(j,
                       {"schema_version", "p_range", "q_range", "mode", "mc", "intrinsic",
                        "output_dir", "emit_plots"},
                       "config");
    SweepConfig cfg;
    const int version = detail::get_or<int>(j, "schema_version", 1);
    if (version != 1) throw ConfigError("unsupported config schema_version");
    auto parse_range = [](const nlohmann::json& obj, const char* name, Range fallback) {
      detail::check_keys(obj, {"min", "max", "step"}, name);
      Range r;
      r.min = detail::get_or<double>(obj, "min", fallback.min);
      r.max = detail::get_or<double>(obj, "max", fallback.max);
      r.step = detail::get_or<double>(obj, "step", fallback.step);
      return r;
    };
    if (j.contains("p_range")) cfg.p_range = parse_range(j.at("p_range"), "p_range", cfg.p_range);
    if (j.contains("q_range")) cfg.q_range = parse_range(j.at("q_range"), "q_range", cfg.q_range);
    if (j.contains("mode")) {
      cfg.mode = sweep_mode_from_name(detail::get_or<std::string>(j, "mode", "analytic"));
    }
    if (j.contains("mc")) {
      const nlohmann::json& m = j.at("mc");
      detail::check_keys(m, {"n_pairs", "seed", "apply_franson_loss"}, "mc");
      McConfig mc;
      mc.n_pairs = detail::get_or<std::uint64_t>(m, "n_pairs", mc.n_pairs);
      mc.seed = detail::get_or<std::uint64_t>(m, "seed", mc.seed);
      mc.apply_franson_loss =
          detail::get_or<bool>(m, "apply_franson_loss", mc.apply_franson_loss);
      cfg.mc = mc;
    }
    if (j.contains("intrinsic")) {
      const nlohmann::json& v = j.at("intrinsic");
      detail::check_keys(v, {"v_pol", "v_et"}, "intrinsic");
      cfg.v_pol = detail::get_or<double>(v, "v_pol", 0.0);
      cfg.v_et = detail::get_or<double>(v, "v_et", 0.0);
    }
    cfg.output_dir = detail::get_or<std::string>(j, "output_dir", cfg.output_dir);
    cfg.emit_plots = detail::get_or<bool>(j, "emit_plots", cfg.emit_plots);
    cfg.validate();
    return cfg;
  }

  static SweepConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config file not found: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
    }
    return from_json(j);
  }
};

struct GridPoint {
  double p = 0.0;
  double q = 0.0;
  KeyRateReport report;
  std::optional<McIntervals> intervals;
};

// Grid is stored row-major with p as the outer (row) index.
struct SweepResult {
  SweepConfig config;
  std::size_t np = 0;
  std::size_t nq = 0;
  std::vector<GridPoint> grid;
  std::string generated_at;

  const GridPoint& at(std::size_t i, std::size_t j) const { return grid[i * nq + j]; }
};

// Requested thread count, environment override, hardware default, in that
// order of precedence. Zero means "not specified".
inline unsigned resolve_thread_count(unsigned requested) {
  unsigned n = requested;
  if (n == 0) {
    if (const char* env = std::getenv("QPA_THREADS")) {
      char* end = nullptr;
      const unsigned long parsed = std::strtoul(env, &end, 10);
      if (end != env && *end == '\0' && parsed > 0) n = static_cast<unsigned>(parsed);
    }
  }
  if (n == 0) n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  return std::min(n, 256u);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

// Evaluate the whole grid. Points are independent; workers pull indices from a
// shared counter and write into preassigned slots, so the result is identical
// for any thread count. Monte Carlo streams are derived per point from the
// master seed, never from the scheduling order.
inline SweepResult run_sweep(const SweepConfig& cfg, unsigned threads = 0) {
  cfg.validate();
  SweepResult result;
  result.config = cfg;
  result.np = cfg.p_range.count();
  result.nq = cfg.q_range.count();
  result.generated_at = utc_timestamp();
  const std::size_t total = result.np * result.nq;
  result.grid.resize(total);

  const unsigned n_threads =
      static_cast<unsigned>(std::min<std::size_t>(resolve_thread_count(threads), total));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&]() {
    try {
      for (std::size_t g = next.fetch_add(1); g < total; g = next.fetch_add(1)) {
        const std::size_t i = g / result.nq;
        const std::size_t j = g % result.nq;
        GridPoint& gp = result.grid[g];
        gp.p = cfg.p_range.at(i);
        gp.q = cfg.q_range.at(j);
        NoiseParams params{gp.p, gp.q, cfg.v_pol, cfg.v_et};
        if (cfg.mode == SweepMode::Analytic) {
          gp.report = evaluate_point(params);
        } else {
          McConfig point_cfg = *cfg.mc;
          point_cfg.seed = derive_stream_seed(cfg.mc->seed, g);
          McReport mc = simulate_experiment(params, point_cfg);
          gp.report = mc.report;
          gp.intervals = mc.intervals;
        }
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return result;
}

// 12 significant digits: enough to reconstruct the double to ~1e-13 relative
// error, few enough to keep files stable across compilers.
inline std::string format_sig12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return std::string(buf);
}

inline constexpr std::string_view kCsvHeader =
    "p,q,e_z_pol,e_x_pol,e_z_et,e_x_et,k_pol,k_et,k_noisy,yield,e_z_post,e_x_post,k_qpa,gain,"
    "region";

inline void emit_csv(const SweepResult& result, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const GridPoint& gp : result.grid) {
    const KeyRateReport& r = gp.report;
    const double fields[] = {gp.p,      gp.q,          r.pol.e_z,      r.pol.e_x,
                             r.et.e_z,  r.et.e_x,      r.k_pol,        r.k_et,
                             r.k_noisy, r.yield,       r.post_pol.e_z, r.post_pol.e_x,
                             r.k_qpa,   r.gain};
    for (double f : fields) out << format_sig12(f) << ',';
    out << region_name(r.region) << '\n';
  }
}

inline void emit_csv(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  emit_csv(result, out);
  if (!out) throw std::runtime_error("failed writing " + path);
}

inline nlohmann::json grid_point_to_json(const GridPoint& gp) {
  const KeyRateReport& r = gp.report;
  nlohmann::json j{{"p", gp.p},
                   {"q", gp.q},
                   {"e_z_pol", r.pol.e_z},
                   {"e_x_pol", r.pol.e_x},
                   {"e_z_et", r.et.e_z},
                   {"e_x_et", r.et.e_x},
                   {"k_pol", r.k_pol},
                   {"k_et", r.k_et},
                   {"k_noisy", r.k_noisy},
                   {"yield", r.yield},
                   {"e_z_post", r.post_pol.e_z},
                   {"e_x_post", r.post_pol.e_x},
                   {"k_qpa", r.k_qpa},
                   {"gain", r.gain},
                   {"region", std::string(region_name(r.region))}};
  if (gp.intervals.has_value()) {
    auto interval_json = [](const Estimate& e) {
      return nlohmann::json{{"value", e.value}, {"lower", e.lower}, {"upper", e.upper}};
    };
    j["intervals"] = {{"e_z_pol", interval_json(gp.intervals->pol_z)},
                      {"e_x_pol", interval_json(gp.intervals->pol_x)},
                      {"e_z_et", interval_json(gp.intervals->et_z)},
                      {"e_x_et", interval_json(gp.intervals->et_x)},
                      {"yield", interval_json(gp.intervals->yield)},
                      {"e_z_post", interval_json(gp.intervals->post_z)},
                      {"e_x_post", interval_json(gp.intervals->post_x)}};
  }
  return j;
}

inline nlohmann::json result_to_json(const SweepResult& result) {
  nlohmann::json j;
  j["schema"] = "qpa-sweep-result";
  j["schema_version"] = 1;
  j["artifact_version"] = std::string(kArtifactVersion);
  j["generated_at"] = result.generated_at;
  if (result.config.mc.has_value()) {
    j["seed"] = result.config.mc->seed;
  } else {
    j["seed"] = nullptr;
  }
  j["config"] = result.config.to_json();
  nlohmann::json grid = nlohmann::json::array();
  for (const GridPoint& gp : result.grid) grid.push_back(grid_point_to_json(gp));
  j["grid"] = std::move(grid);
  return j;
}

inline void emit_json(const SweepResult& result, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << result_to_json(result).dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path);
}

// Cell counts and extents per region label. Area assigns one step-sized cell
// to every grid point.
struct RegionSummary {
  Region region = Region::None;
  std::size_t cells = 0;
  double area = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;
  double q_min = 0.0;
  double q_max = 0.0;
};

inline std::vector<RegionSummary> summarize_regions(const SweepResult& result) {
  std::vector<RegionSummary> out;
  const double cell = result.config.p_range.step * result.config.q_range.step;
  for (Region region : {Region::None, Region::I, Region::II, Region::III, Region::IV}) {
    RegionSummary s;
    s.region = region;
    bool first = true;
    for (const GridPoint& gp : result.grid) {
      if (gp.report.region != region) continue;
      ++s.cells;
      if (first) {
        s.p_min = s.p_max = gp.p;
        s.q_min = s.q_max = gp.q;
        first = false;
      } else {
        s.p_min = std::min(s.p_min, gp.p);
        s.p_max = std::max(s.p_max, gp.p);
        s.q_min = std::min(s.q_min, gp.q);
        s.q_max = std::max(s.q_max, gp.q);
      }
    }
    s.area = static_cast<double>(s.cells) * cell;
    out.push_back(s);
  }
  return out;
}

// Number of 4-connected components among grid points with strictly positive
// gain.
inline std::size_t count_positive_gain_components(const SweepResult& result) {
  const std::size_t np = result.np;
  const std::size_t nq = result.nq;
  std::vector<char> positive(np * nq);
  for (std::size_t g = 0; g < result.grid.size(); ++g) {
    positive[g] = result.grid[g].report.gain > 0.0 ? 1 : 0;
  }
  std::vector<char> seen(np * nq, 0);
  std::size_t components = 0;
  for (std::size_t start = 0; start < positive.size(); ++start) {
    if (!positive[start] || seen[start]) continue;
    ++components;
    std::queue<std::size_t> frontier;
    frontier.push(start);
    seen[start] = 1;
    while (!frontier.empty()) {
      const std::size_t g = frontier.front();
      frontier.pop();
      const std::size_t i = g / nq;
      const std::size_t j = g % nq;
      auto visit = [&](std::size_t gi, std::size_t gj) {
        const std::size_t h = gi * nq + gj;
        if (positive[h] && !seen[h]) {
          seen[h] = 1;
          frontier.push(h);
        }
      };
      if (i > 0) visit(i - 1, j);
      if (i + 1 < np) visit(i + 1, j);
      if (j > 0) visit(i, j - 1);
      if (j + 1 < nq) visit(i, j + 1);
    }
  }
  return components;
}

}  // namespace qpa
