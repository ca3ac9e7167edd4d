#include "anderson/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "anderson/error.hpp"
#include "anderson/feynman_kac.hpp"
#include "anderson/local_times.hpp"
#include "anderson/parallel.hpp"
#include "anderson/paths.hpp"
#include "anderson/recovery.hpp"
#include "anderson/spectral.hpp"

namespace fs = std::filesystem;

namespace anderson {
namespace {

constexpr const char* kRunSection = "run";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double parse_number(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (trim(text.substr(used)).empty() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  fail(ErrorCode::Schema, what + ": '" + text + "' is not a number");
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',' || c == ' ' || c == '\t') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::uint32_t salt_of(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return std::uint32_t(h ^ (h >> 32));
}

// ---------------------------------------------------------------------------
// CSV output

class CsvOut {
 public:
  CsvOut(const std::string& command, const std::string& fp, const std::string& domain) {
    os_ << "# schema=" << kCsvSchema << "\n";
    os_ << "# command=" << command << "\n";
    os_ << "# fingerprint=" << fp << "\n";
    os_ << "# domain=" << domain << "\n";
    os_ << "# domain_fingerprint=" << fingerprint(domain) << "\n";
  }

  void meta(const std::string& key, const std::string& value) {
    os_ << "# " << key << "=" << value << "\n";
  }
  void columns(std::initializer_list<const char*> cols) {
    bool first = true;
    for (const char* c : cols) {
      os_ << (first ? "" : ",") << c;
      first = false;
    }
    os_ << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os_ << (i ? "," : "") << cells[i];
    os_ << "\n";
  }
  void save(const fs::path& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) fail(ErrorCode::Io, "cannot write '" + path.string() + "'");
    f << os_.str();
    if (!f) fail(ErrorCode::Io, "error writing '" + path.string() + "'");
  }

 private:
  std::ostringstream os_;
};

std::string num(double v) { return format_number(v); }
std::string num(std::size_t v) { return std::to_string(v); }

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opt;
  std::string command;
  std::uint64_t seed = 1;
  fs::path out;
  RunResult result;

  std::string command_fingerprint(const std::string& domain) const {
    return fingerprint("command=" + command + ";domain=" + domain + ";" +
                       cfg.canonical(command) + "seed=" + std::to_string(seed));
  }
  fs::path output(const std::string& name) {
    const fs::path p = out / name;
    result.files.push_back(p.string());
    return p;
  }
};

// ---------------------------------------------------------------------------
// silt-validate

TimeRegion parse_region(const std::string& word, double t) {
  const auto parts = [&] {
    std::vector<std::string> p;
    std::stringstream ss(word);
    std::string item;
    while (std::getline(ss, item, ':')) p.push_back(item);
    return p;
  }();
  TimeRegion r;
  if (parts.size() == 1 && parts[0] == "triangle") {
    r = TimeRegion::triangle(t);
  } else if (parts.size() == 3 && parts[0] == "diag") {
    r = TimeRegion::diag_block(parse_number(parts[1], word), parse_number(parts[2], word));
  } else if (parts.size() == 5 && parts[0] == "rect") {
    r = TimeRegion::rect(parse_number(parts[1], word), parse_number(parts[2], word),
                         parse_number(parts[3], word), parse_number(parts[4], word));
  } else {
    fail(ErrorCode::Schema,
         "region '" + word + "': expected triangle, diag:a:b or rect:a:b:c:d");
  }
  try {
    r.validate(t);
  } catch (const Error& e) {
    fail(ErrorCode::Schema, "region '" + word + "': " + e.what());
  }
  if (!(r.area() > 0.0)) fail(ErrorCode::Schema, "region '" + word + "' is empty");
  return r;
}

void cmd_silt_validate(Context& ctx) {
  const std::string sec = "silt-validate";
  const auto& cfg = ctx.cfg;
  const auto ts = cfg.numbers(sec, "t");
  const auto epss = cfg.numbers(sec, "eps");
  const auto kinds_w = cfg.words(sec, "kinds").empty() ? std::vector<std::string>{"motion", "bridge"}
                                                       : cfg.words(sec, "kinds");
  auto region_words = cfg.words(sec, "regions");
  if (region_words.empty()) region_words = {"triangle"};
  const long n_paths = cfg.integer_or(sec, "n_paths", 10000);
  const long n_steps = cfg.integer_or(sec, "n_steps", 512);
  const bool truncation = cfg.flag_or(sec, "truncation", true);
  if (n_paths < 2 || n_steps < 2) fail(ErrorCode::Schema, "silt-validate: n_paths and n_steps must be >= 2");
  if (ts.empty() || epss.empty()) fail(ErrorCode::Schema, "silt-validate: t and eps lists are required");
  std::vector<PathKind> kinds;
  for (const auto& w : kinds_w) {
    if (w == "motion") kinds.push_back(PathKind::Motion);
    else if (w == "bridge") kinds.push_back(PathKind::Bridge);
    else fail(ErrorCode::Schema, "silt-validate: unknown kind '" + w + "'");
  }
  for (double e : epss)
    if (!(e > 0.0)) fail(ErrorCode::Schema, "silt-validate: eps must be positive");
  // Parse every region against every t before any sampling.
  std::vector<std::vector<TimeRegion>> regions;
  for (double t : ts) {
    if (!(t > 0.0)) fail(ErrorCode::Schema, "silt-validate: t must be positive");
    std::vector<TimeRegion> rs;
    for (const auto& w : region_words) {
      rs.push_back(parse_region(w, t));
      try {
        approx_silt(DiscretePath{PathKind::Motion, {}, t, int(n_steps),
                                 std::vector<Point2>(std::size_t(n_steps) + 1)},
                    epss.front(), rs.back(), false);
      } catch (const Error& e) {
        fail(ErrorCode::Schema, "region '" + w + "': " + e.what());
      }
    }
    regions.push_back(std::move(rs));
  }

  const std::string domain_desc = "none";
  CsvOut csv(ctx.command, ctx.command_fingerprint(domain_desc), domain_desc);
  csv.meta("seed", std::to_string(ctx.seed));
  csv.columns({"t", "eps", "kind", "region", "n_paths", "n_steps", "mc_mean", "mc_se",
               "exact_mean", "discrete_mean", "asymptotic_mean", "pass"});
  std::vector<std::string> failures;

  for (std::size_t ti = 0; ti < ts.size(); ++ti) {
    const double t = ts[ti];
    for (PathKind kind : kinds) {
      for (double e : epss) check_resolution(t / double(n_steps), e);
      const std::size_t combos = epss.size() * regions[ti].size();
      std::vector<double> values(std::size_t(n_paths) * combos);
      const std::uint32_t salt = salt_of(std::string(to_string(kind)) + ":" + format_number(t));
      parallel_ranges(std::size_t(n_paths), ctx.opt.workers, [&](std::size_t b, std::size_t en) {
        DiscretePath path;
        for (std::size_t i = b; i < en; ++i) {
          RandomStream rng = RandomStream::derive(ctx.seed, i, salt);
          if (kind == PathKind::Motion)
            sample_motion(path, {0.0, 0.0}, t, int(n_steps), rng);
          else
            sample_bridge(path, {0.0, 0.0}, t, int(n_steps), rng);
          std::size_t c = 0;
          for (double e : epss)
            for (const auto& r : regions[ti])
              values[i * combos + c++] = approx_silt(path, e, r, truncation);
        }
      });
      std::size_t c = 0;
      for (double e : epss) {
        for (std::size_t ri = 0; ri < regions[ti].size(); ++ri, ++c) {
          const TimeRegion& r = regions[ti][ri];
          CompensatedSum sum, sq;
          for (long i = 0; i < n_paths; ++i) sum.add(values[std::size_t(i) * combos + c]);
          const double mean = sum.value() / double(n_paths);
          for (long i = 0; i < n_paths; ++i) {
            const double d = values[std::size_t(i) * combos + c] - mean;
            sq.add(d * d);
          }
          const double se = std::sqrt(sq.value() / double(n_paths - 1) / double(n_paths));
          const double exact = silt_mean_exact(kind, t, e, r);
          const double discrete = silt_mean_exact(kind, t, e, r, int(n_steps));
          std::string asym;
          if (r.is_diagonal() || kind == PathKind::Bridge)
            asym = num(silt_mean_asymptotic(kind, t, e, r));
          const bool pass = std::abs(mean - exact) <= 3.0 * se;
          csv.row({num(t), num(e), to_string(kind), r.describe(), std::to_string(n_paths),
                   std::to_string(n_steps), num(mean), num(se), num(exact), num(discrete), asym,
                   pass ? "1" : "0"});
          if (!pass) {
            std::ostringstream os;
            os << "t=" << t << " eps=" << e << " kind=" << to_string(kind)
               << " region=" << r.describe() << ": |mc-exact|=" << std::abs(mean - exact)
               << " > 3 se=" << 3.0 * se;
            failures.push_back(os.str());
          }
        }
      }
    }
  }
  csv.save(ctx.output("silt_validate.csv"));
  if (!failures.empty()) {
    ctx.result.exit_code = 2;
    for (const auto& f : failures) ctx.result.message += "FAIL " + f + "\n";
  } else {
    ctx.result.message += "silt-validate: all rows within 3 standard errors\n";
  }
}

// ---------------------------------------------------------------------------
// trace / mass

FkConfig fk_config(const ExperimentConfig& cfg, const std::string& sec, std::uint64_t seed,
                   unsigned workers) {
  FkConfig fk;
  fk.n_steps = int(cfg.integer_or(sec, "n_steps", 512));
  fk.n_outer = std::size_t(cfg.integer_or(sec, "n_outer", 10000));
  fk.n_paths_per_x = int(cfg.integer_or(sec, "n_paths_per_x", 1));
  fk.exit_correction = cfg.flag_or(sec, "exit_correction", true);
  fk.kernel_truncation = cfg.flag_or(sec, "kernel_truncation", true);
  fk.exponent_cap = cfg.number_or(sec, "exponent_cap", 30.0);
  fk.seed = seed;
  fk.workers = workers;
  if (cfg.integer_or(sec, "n_outer", 10000) < 1 || cfg.integer_or(sec, "n_steps", 512) < 2)
    fail(ErrorCode::Schema, sec + ": n_outer must be >= 1 and n_steps >= 2");
  try {
    fk.eps = 1.0;
    fk.validate();
  } catch (const Error& e) {
    fail(ErrorCode::Schema, sec + ": " + e.what());
  }
  return fk;
}

double eps_for(const ExperimentConfig& cfg, const std::string& sec, double t, int n_steps) {
  const std::string e = cfg.get_or(sec, "eps", "auto");
  if (e == "auto") {
    const double rel = cfg.number_or(sec, "eps_rel", 1e-3);
    if (!(rel > 0.0)) fail(ErrorCode::Schema, sec + ": eps_rel must be positive");
    return default_eps(t, n_steps, rel);
  }
  const double v = parse_number(e, sec + ".eps");
  if (!(v > 0.0)) fail(ErrorCode::Schema, sec + ": eps must be positive");
  return v;
}

void cmd_moments(Context& ctx, bool trace) {
  const std::string sec = ctx.command;
  const auto& cfg = ctx.cfg;
  const PlanarDomain domain = cfg.domain();
  auto ts = cfg.numbers(sec, "t");
  auto kappas = cfg.numbers(sec, "kappa");
  if (ts.empty()) fail(ErrorCode::Schema, sec + ": t list is required");
  if (kappas.empty()) kappas = {0.0};
  for (double t : ts)
    if (!(t > 0.0)) fail(ErrorCode::Schema, sec + ": t must be positive");
  FkConfig fk = fk_config(cfg, sec, ctx.seed, ctx.opt.workers);
  const bool use_cv = cfg.flag_or(sec, "control_variate", true);
  const bool variance = cfg.flag_or(sec, "variance", false);
  const long var_outer = cfg.integer_or(sec, "variance_n_outer", long(fk.n_outer));
  const double overflow_tol = cfg.number_or(sec, "overflow_tolerance", 1e-4);

  const auto model = spectral_model_for(domain, *std::min_element(ts.begin(), ts.end()));
  const SpectralModel* cv_model = (use_cv && model) ? &*model : nullptr;

  const std::string desc = domain.describe();
  const std::string fp = ctx.command_fingerprint(desc);
  auto make_csv = [&] {
    CsvOut csv(ctx.command, fp, desc);
    csv.meta("seed", std::to_string(ctx.seed));
    csv.meta("area", num(domain.area()));
    csv.meta("perimeter", num(domain.perimeter()));
    csv.meta("control_variate", cv_model ? "1" : "0");
    csv.columns({"t", "kappa", "estimate", "std_error", "prefactor", "n_outer", "n_steps", "eps",
                 "overflow_count", "reference", "ref_gap"});
    return csv;
  };
  CsvOut means = make_csv();
  CsvOut vars = make_csv();
  std::vector<std::string> flagged;

  auto check_overflow = [&](const MomentEstimate& e) {
    const double n = double(e.n_outer) * double(e.n_paths_per_x);
    if (double(e.overflow_count) > overflow_tol * n) {
      std::ostringstream os;
      os << to_string(e.target) << " t=" << e.t << " kappa=" << e.kappa
         << ": overflow_count=" << e.overflow_count << " exceeds " << overflow_tol * 100.0
         << "% of samples";
      flagged.push_back(os.str());
    }
  };

  for (double t : ts) {
    fk.eps = eps_for(cfg, sec, t, fk.n_steps);
    std::string ref;
    double ref_value = 0.0;
    if (model) {
      ref_value = trace ? heat_trace(*model, t) : heat_content(*model, t);
      ref = num(ref_value);
    }
    for (double kappa : kappas) {
      const MomentEstimate e = trace ? estimate_trace_mean(domain, kappa, t, fk, cv_model)
                                     : estimate_mass_mean(domain, kappa, t, fk, cv_model);
      check_overflow(e);
      const std::string gap =
          (model && kappa == 0.0) ? num((e.value - ref_value) / ref_value) : std::string{};
      means.row({num(t), num(kappa), num(e.value), num(e.std_error), num(e.prefactor),
                 num(e.n_outer), std::to_string(e.n_steps), num(e.eps),
                 num(e.overflow_count), ref, gap});
      if (variance) {
        FkConfig vfk = fk;
        vfk.n_outer = std::size_t(std::max(1L, var_outer));
        const MomentEstimate v = trace ? estimate_trace_variance(domain, kappa, t, vfk)
                                       : estimate_mass_variance(domain, kappa, t, vfk);
        check_overflow(v);
        vars.row({num(t), num(kappa), num(v.value), num(v.std_error), num(v.prefactor),
                  num(v.n_outer), std::to_string(v.n_steps), num(v.eps),
                  num(v.overflow_count), "", ""});
      }
    }
  }
  means.save(ctx.output(sec + ".csv"));
  if (variance) vars.save(ctx.output(sec + "_variance.csv"));
  if (!flagged.empty()) {
    ctx.result.exit_code = 2;
    for (const auto& f : flagged) ctx.result.message += "FLAGGED " + f + "\n";
  } else {
    ctx.result.message += sec + ": " + std::to_string(ts.size() * kappas.size()) + " rows written\n";
  }
}

// ---------------------------------------------------------------------------
// recover

struct Series {
  std::map<double, std::vector<SeriesPoint>> by_kappa;
  std::vector<SeriesPoint> reference;
  std::string domain_fingerprint;
};

Series load_series(const fs::path& path, const std::string& expected_command) {
  const CsvTable table = read_csv(path.string());
  auto it = table.header.find("schema");
  if (it == table.header.end() || it->second != kCsvSchema)
    fail(ErrorCode::Schema, path.string() + ": missing or unsupported schema line");
  it = table.header.find("command");
  if (it == table.header.end() || it->second != expected_command)
    fail(ErrorCode::Schema, path.string() + ": expected output of '" + expected_command + "'");
  Series s;
  if (auto d = table.header.find("domain_fingerprint"); d != table.header.end())
    s.domain_fingerprint = d->second;
  const std::size_t ct = table.column("t"), ck = table.column("kappa"),
                    cv = table.column("estimate"), cs = table.column("std_error"),
                    cr = table.column("reference");
  std::set<double> ref_ts;
  for (const auto& row : table.rows) {
    const double t = parse_number(row[ct], path.string() + " t");
    const double k = parse_number(row[ck], path.string() + " kappa");
    s.by_kappa[k].push_back({t, parse_number(row[cv], path.string() + " estimate"),
                             parse_number(row[cs], path.string() + " std_error")});
    if (!row[cr].empty() && ref_ts.insert(t).second)
      s.reference.push_back({t, parse_number(row[cr], path.string() + " reference"), 0.0});
  }
  return s;
}

void cmd_recover(Context& ctx) {
  const std::string sec = "recover";
  const auto& cfg = ctx.cfg;
  auto resolve = [&](const std::string& p) {
    fs::path q(p);
    return q.is_absolute() ? q : ctx.out / q;
  };
  const bool force = cfg.flag_or(sec, "force", false);
  std::vector<std::string> estimators = cfg.words(sec, "estimators");
  if (estimators.empty()) estimators = {"area", "perimeter", "kappa2", "minkowski"};

  std::optional<Series> trace_s, mass_s;
  if (cfg.has(sec, "trace_csv")) trace_s = load_series(resolve(cfg.get(sec, "trace_csv")), "trace");
  if (cfg.has(sec, "mass_csv")) mass_s = load_series(resolve(cfg.get(sec, "mass_csv")), "mass");

  std::string domain_desc = "none";
  std::optional<double> area;
  if (cfg.has_section("domain")) {
    const PlanarDomain d = cfg.domain();
    domain_desc = d.describe();
    area = d.area();
  }
  const std::string area_cfg = cfg.get_or(sec, "area", "auto");
  if (area_cfg != "auto") area = parse_number(area_cfg, "recover.area");

  // Inputs must describe the same domain (and match [domain] if given).
  if (!force) {
    std::set<std::string> fps;
    if (trace_s) fps.insert(trace_s->domain_fingerprint);
    if (mass_s) fps.insert(mass_s->domain_fingerprint);
    if (cfg.has_section("domain")) fps.insert(fingerprint(domain_desc));
    if (fps.size() > 1)
      fail(ErrorCode::Schema, "recover: input CSVs were produced for different domains "
                              "(domain_fingerprint mismatch); set force = true to override");
  }

  std::vector<double> kappa_filter = cfg.numbers(sec, "kappa");
  auto wanted = [&](double k) {
    return kappa_filter.empty() ||
           std::find(kappa_filter.begin(), kappa_filter.end(), k) != kappa_filter.end();
  };
  const std::string zero_source = cfg.get_or(sec, "zero_source", "auto");

  CsvOut csv(ctx.command, ctx.command_fingerprint(domain_desc), domain_desc);
  csv.columns({"estimator", "kappa", "t", "estimate", "std_error", "rate_condition"});
  auto need_area = [&](const std::string& which) {
    if (!area) fail(ErrorCode::Schema, "recover: " + which + " needs an area (set area = ... or a [domain])");
    return *area;
  };
  auto need = [&](const std::optional<Series>& s, const char* which, const std::string& est) -> const Series& {
    if (!s) fail(ErrorCode::Schema, "recover: estimator " + est + " needs " + which);
    return *s;
  };
  std::size_t rows = 0;
  for (const auto& est : estimators) {
    if (est == "area" || est == "perimeter") {
      const Series& s = need(trace_s, "trace_csv", est);
      for (const auto& [k, series] : s.by_kappa) {
        if (!wanted(k)) continue;
        const RecoveryEstimate r = est == "area" ? recover_area(series)
                                                 : recover_perimeter(series, need_area(est));
        const double tmin = std::min_element(series.begin(), series.end(), [](auto& a, auto& b) {
                              return a.t < b.t;
                            })->t;
        csv.row({est, num(k), num(tmin), num(r.estimate), num(r.std_error),
                 est == "area" ? "t_n<=c*n^(-1/2-eps)" : "t_n<=c*n^(-1-eps)"});
        ++rows;
      }
    } else if (est == "kappa2") {
      const Series& s = need(trace_s, "trace_csv", est);
      const double a = need_area(est);
      std::vector<SeriesPoint> zero;
      if (zero_source == "rows" || (zero_source == "auto" && s.by_kappa.count(0.0))) {
        if (!s.by_kappa.count(0.0)) fail(ErrorCode::Schema, "recover: no kappa = 0 rows for kappa2");
        zero = s.by_kappa.at(0.0);
      } else if (zero_source == "reference" || zero_source == "auto") {
        zero = s.reference;
      } else {
        fail(ErrorCode::Schema, "recover: zero_source must be auto, rows or reference");
      }
      if (zero.empty()) fail(ErrorCode::Schema, "recover: no kappa = 0 series available for kappa2");
      for (const auto& [k, series] : s.by_kappa) {
        if (k == 0.0 || !wanted(k)) continue;
        const Kappa2Recovery r = recover_kappa2(series, zero, a);
        const char* rate = "t_n<=c'*exp(-c*n^(1/2+eps))";
        for (const auto& p : r.pointwise)
          csv.row({"kappa2_pointwise", num(k), num(p.t), num(p.estimate), num(p.std_error), rate});
        csv.row({"kappa2", num(k), num(r.pointwise.front().t), num(r.headline.estimate),
                 num(r.headline.std_error), rate});
        rows += r.pointwise.size() + 1;
      }
    } else if (est == "minkowski") {
      const Series& s = need(mass_s, "mass_csv", est);
      const double a = need_area(est);
      for (const auto& [k, series] : s.by_kappa) {
        if (!wanted(k)) continue;
        const MinkowskiRecovery r = recover_minkowski(series, a);
        const char* rate = "t_n<=c*n^(-1/d_M-eps)";
        for (const auto& p : r.pointwise)
          csv.row({"minkowski_pointwise", num(k), num(p.t), num(p.estimate), num(p.std_error), rate});
        csv.row({"minkowski_regression", num(k), "", num(r.regression_dimension), "", rate});
        rows += r.pointwise.size() + 1;
      }
    } else {
      fail(ErrorCode::Schema, "recover: unknown estimator '" + est + "'");
    }
  }
  csv.save(ctx.output("recover.csv"));
  ctx.result.message += "recover: " + std::to_string(rows) + " rows written\n";
}

// ---------------------------------------------------------------------------
// minkowski

void cmd_minkowski(Context& ctx) {
  const std::string sec = "minkowski";
  const auto& cfg = ctx.cfg;
  const PlanarDomain domain = cfg.domain();
  std::vector<double> rs = cfg.numbers(sec, "r");
  if (rs.empty()) {
    const double lo = cfg.number_or(sec, "r_min", 1e-3), hi = cfg.number_or(sec, "r_max", 1e-2);
    const long n = cfg.integer_or(sec, "n_r", 6);
    if (!(lo > 0.0 && hi > lo && n >= 3))
      fail(ErrorCode::Schema, "minkowski: need 0 < r_min < r_max and n_r >= 3");
    for (long i = 0; i < n; ++i)
      rs.push_back(lo * std::pow(hi / lo, double(i) / double(n - 1)));
  }
  for (double r : rs)
    if (!(r > 0.0)) fail(ErrorCode::Schema, "minkowski: r must be positive");
  const long n_samples = cfg.integer_or(sec, "n_samples", 1'000'000);
  if (n_samples < 1000) fail(ErrorCode::Schema, "minkowski: n_samples must be >= 1000");

  const std::string desc = domain.describe();
  CsvOut csv(ctx.command, ctx.command_fingerprint(desc), desc);
  csv.meta("seed", std::to_string(ctx.seed));
  csv.columns({"r", "area", "std_error", "hits", "n_samples"});
  std::vector<BoundaryNeighborhood> nbs;
  std::vector<std::string> empty;
  constexpr std::size_t kBlock = 1u << 16;
  const std::size_t n_blocks = (std::size_t(n_samples) + kBlock - 1) / kBlock;
  for (std::size_t ri = 0; ri < rs.size(); ++ri) {
    const double r = rs[ri];
    std::vector<std::size_t> hits(n_blocks);
    const std::uint32_t salt = salt_of("minkowski:" + format_number(r));
    parallel_ranges(n_blocks, ctx.opt.workers, [&](std::size_t b, std::size_t e) {
      for (std::size_t k = b; k < e; ++k) {
        RandomStream rng = RandomStream::derive(ctx.seed, k, salt);
        const std::size_t n = std::min(kBlock, std::size_t(n_samples) - k * kBlock);
        hits[k] = boundary_neighborhood_hits(domain, r, n, rng);
      }
    });
    const std::size_t total = std::accumulate(hits.begin(), hits.end(), std::size_t{0});
    const double box = domain.bounding_box().inflated(r).area();
    const double p = double(total) / double(n_samples);
    BoundaryNeighborhood nb{r, box * p, box * std::sqrt(p * (1.0 - p) / double(n_samples))};
    nbs.push_back(nb);
    if (total == 0) empty.push_back(format_number(r));
    csv.row({num(r), num(nb.area_estimate), num(nb.std_error), num(total),
             std::to_string(n_samples)});
  }
  csv.save(ctx.output("minkowski.csv"));
  if (!empty.empty()) {
    ctx.result.exit_code = 2;
    for (const auto& r : empty) ctx.result.message += "UNDERSAMPLED no hits at r=" + r + "\n";
    return;
  }
  CsvOut fit(ctx.command, ctx.command_fingerprint(desc), desc);
  fit.columns({"method", "kappa", "dimension"});
  const double d = minkowski_fit(nbs);
  fit.row({"tube_area_fit", "", num(d)});
  std::ostringstream msg;
  msg << "minkowski: tube-area dimension " << d << "\n";
  if (cfg.has(sec, "mass_csv")) {
    fs::path q(cfg.get(sec, "mass_csv"));
    if (!q.is_absolute()) q = ctx.out / q;
    const Series s = load_series(q, "mass");
    for (const auto& [k, series] : s.by_kappa) {
      const MinkowskiRecovery r = recover_minkowski(series, domain.area());
      fit.row({"heat_content_regression", num(k), num(r.regression_dimension)});
      msg << "minkowski: heat-content dimension (kappa=" << k << ") " << r.regression_dimension
          << "\n";
    }
  }
  fit.save(ctx.output("minkowski_fit.csv"));
  ctx.result.message += msg.str();
}

}  // namespace

// ---------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::parse(const std::string& text, const std::string& base_dir) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::Schema, std::string("config: ") + e.what());
  }
  ExperimentConfig cfg;
  cfg.base_dir_ = base_dir;
  for (const auto& [key, node] : tree) {
    if (node.empty()) {
      cfg.sections_[kRunSection][key] = trim(node.data());
    } else {
      auto& sec = cfg.sections_[key];
      for (const auto& [k, v] : node) {
        if (!v.empty()) fail(ErrorCode::Schema, "config: nested keys are not supported");
        sec[k] = trim(v.data());
      }
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open config '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  const fs::path parent = fs::path(path).parent_path();
  return parse(os.str(), parent.empty() ? "." : parent.string());
}

bool ExperimentConfig::has_section(const std::string& section) const {
  return sections_.count(section) > 0;
}

bool ExperimentConfig::has(const std::string& section, const std::string& key) const {
  auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string ExperimentConfig::get(const std::string& section, const std::string& key) const {
  if (!has(section, key)) fail(ErrorCode::Schema, "config: missing key [" + section + "] " + key);
  return sections_.at(section).at(key);
}

std::string ExperimentConfig::get_or(const std::string& section, const std::string& key,
                                     const std::string& fallback) const {
  return has(section, key) ? get(section, key) : fallback;
}

double ExperimentConfig::number(const std::string& section, const std::string& key) const {
  return parse_number(get(section, key), "[" + section + "] " + key);
}

double ExperimentConfig::number_or(const std::string& section, const std::string& key,
                                   double fallback) const {
  return has(section, key) ? number(section, key) : fallback;
}

long ExperimentConfig::integer_or(const std::string& section, const std::string& key,
                                  long fallback) const {
  if (!has(section, key)) return fallback;
  const double v = number(section, key);
  if (v != std::floor(v) || std::abs(v) > 9e15)
    fail(ErrorCode::Schema, "config: [" + section + "] " + key + " must be an integer");
  return long(v);
}

bool ExperimentConfig::flag_or(const std::string& section, const std::string& key,
                               bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorCode::Schema, "config: [" + section + "] " + key + " must be a boolean");
}

std::vector<double> ExperimentConfig::numbers(const std::string& section,
                                              const std::string& key) const {
  std::vector<double> out;
  for (const auto& w : words(section, key))
    out.push_back(parse_number(w, "[" + section + "] " + key));
  return out;
}

std::vector<std::string> ExperimentConfig::words(const std::string& section,
                                                 const std::string& key) const {
  return has(section, key) ? split_words(get(section, key)) : std::vector<std::string>{};
}

std::string ExperimentConfig::canonical(const std::string& section) const {
  std::string out;
  if (auto s = sections_.find(section); s != sections_.end())
    for (const auto& [k, v] : s->second) out += k + "=" + v + ";";
  return out;
}

PlanarDomain ExperimentConfig::domain() const {
  const std::string sec = "domain";
  if (!has_section(sec)) fail(ErrorCode::Schema, "config: missing [domain] section");
  const std::string type = get(sec, "type");
  try {
    if (type == "rectangle" || type == "square") {
      const double w = number_or(sec, "width", 1.0);
      return PlanarDomain::rectangle(w, number_or(sec, "height", w),
                                     {number_or(sec, "origin_x", 0.0), number_or(sec, "origin_y", 0.0)});
    }
    if (type == "disk")
      return PlanarDomain::disk(number_or(sec, "radius", 1.0),
                                {number_or(sec, "center_x", 0.0), number_or(sec, "center_y", 0.0)});
    if (type == "koch")
      return PlanarDomain::koch(int(integer_or(sec, "level", 0)), number_or(sec, "side", 1.0),
                                {number_or(sec, "origin_x", 0.0), number_or(sec, "origin_y", 0.0)});
    if (type == "polygon") {
      fs::path p(get(sec, "vertices_file"));
      if (!p.is_absolute()) p = fs::path(base_dir_) / p;
      return PlanarDomain::polygon(load_vertex_file(p.string()));
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Io) throw;
    fail(ErrorCode::Schema, std::string("config: [domain] ") + e.what());
  }
  fail(ErrorCode::Schema, "config: unknown domain type '" + type + "'");
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::size_t CsvTable::column(const std::string& name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) fail(ErrorCode::Schema, "CSV: missing column '" + name + "'");
  return std::size_t(it - columns.begin());
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(l);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) t.header[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    if (t.columns.empty()) {
      t.columns = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.columns.size())
      fail(ErrorCode::Schema, path + ": row has " + std::to_string(cells.size()) +
                                  " cells, expected " + std::to_string(t.columns.size()));
    t.rows.push_back(std::move(cells));
  }
  if (t.columns.empty()) fail(ErrorCode::Schema, path + ": no column header");
  return t;
}

RunResult run_command(const std::string& command, const ExperimentConfig& config,
                      const RunOptions& options) {
  Context ctx{config, options, command};
  try {
    ctx.seed = options.seed ? *options.seed
                            : std::uint64_t(config.integer_or(kRunSection, "seed", 1));
    ctx.out = options.out_dir;
    fs::create_directories(ctx.out);
    if (command == "silt-validate") cmd_silt_validate(ctx);
    else if (command == "trace") cmd_moments(ctx, true);
    else if (command == "mass") cmd_moments(ctx, false);
    else if (command == "recover") cmd_recover(ctx);
    else if (command == "minkowski") cmd_minkowski(ctx);
    else fail(ErrorCode::InvalidArgument, "unknown command '" + command + "'");
  } catch (const Error& e) {
    ctx.result.exit_code = e.code() == ErrorCode::Io || e.code() == ErrorCode::Schema ||
                                   e.code() == ErrorCode::InvalidArgument
                               ? 1
                               : 2;
    ctx.result.message += std::string("error: ") + e.what() + "\n";
  } catch (const fs::filesystem_error& e) {
    ctx.result.exit_code = 1;
    ctx.result.message += std::string("error: ") + e.what() + "\n";
  }
  return ctx.result;
}

}  // namespace anderson
