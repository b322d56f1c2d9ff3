#pragma once

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lehmer/calculus.hpp"
#include "lehmer/errors.hpp"
#include "lehmer/inflection.hpp"
#include "lehmer/json_io.hpp"
#include "lehmer/mean_core.hpp"
#include "lehmer/search.hpp"
#include "lehmer/verify.hpp"

namespace lehmer_mean::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kDomain = 2,
  kRangeExhausted = 3,
  kVerificationFailed = 4,
};

/// Nine significant digits for console tables.
inline std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline double parse_double(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size())
    throw usage_error("cannot parse number: '" + std::string(text) + "'");
  return v;
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(parse_double(item));
  if (out.empty()) throw usage_error("empty value list");
  return out;
}

/// One value[,weight] per line; blank lines and '#' comments are skipped.
inline std::pair<std::vector<double>, std::vector<double>> read_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw usage_error("cannot open value file: " + path);
  std::vector<double> values, weights;
  bool any_weight = false, all_weight = true;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto comma = line.find(',');
    values.push_back(parse_double(line.substr(0, comma)));
    if (comma != std::string::npos) {
      weights.push_back(parse_double(line.substr(comma + 1)));
      any_weight = true;
    } else {
      weights.push_back(1.0);
      all_weight = false;
    }
  }
  if (any_weight && !all_weight) throw usage_error("value file mixes weighted and unweighted lines");
  return {values, any_weight ? weights : std::vector<double>{}};
}

struct SpecInput {
  std::string values;
  std::string weights;
  std::string file;

  void add_to(CLI::App* app) {
    app->add_option("-x,--values", values, "Comma-separated positive values");
    app->add_option("-w,--weights", weights, "Comma-separated positive weights");
    app->add_option("--file", file, "File with one value[,weight] per line");
  }

  MeanSpec build() const {
    std::vector<double> xs, ws;
    if (!file.empty()) {
      if (!values.empty()) throw usage_error("give either --values or --file, not both");
      std::tie(xs, ws) = read_value_file(file);
    } else {
      if (values.empty()) throw usage_error("--values or --file is required");
      xs = parse_list(values);
    }
    if (!weights.empty()) ws = parse_list(weights);
    if (ws.empty()) return make_spec(xs);
    return make_spec(xs, ws);
  }
};

struct ScanFlags {
  ScanConfig config;

  void add_to(CLI::App* app) {
    app->add_option("--half-width", config.initial_half_width, "Initial scan half width");
    app->add_option("--max-half-width", config.max_half_width, "Largest scan half width");
    app->add_option("--grid-density", config.grid_points_per_unit, "Grid points per unit of p");
    app->add_option("--tol", config.refine_tolerance, "Bisection tolerance on p");
  }
};

struct GlobalFlags {
  bool json_output = false;
  std::string precision = "auto";
  std::optional<std::uint64_t> seed;
  std::string output;
  bool timestamp = false;
  precision_mode mode = precision_mode::automatic;
};

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Runner {
 public:
  Runner(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(int argc, const char* const* argv) {
    CLI::App app{"Lehmer mean evaluation, calculus and inflection analysis"};
    app.name("lehmer");
    app.require_subcommand(1);
    app.add_flag("--json", globals_.json_output, "Emit one JSON record");
    app.add_option("--precision", globals_.precision, "standard, extended or auto")
        ->check(CLI::IsMember({"standard", "extended", "auto"}));
    app.add_option("--seed", globals_.seed, "Random seed");
    app.add_option("--output", globals_.output, "Write output to this path (a directory for figure-data)");
    app.add_flag("--timestamp", globals_.timestamp, "Add a timestamp field to JSON output");

    SpecInput spec_in;
    ScanFlags scan;

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate L(p) at a point or over a range");
    spec_in.add_to(eval);
    std::optional<double> p_point;
    std::string p_range;
    eval->add_option("-p", p_point, "Exponent");
    eval->add_option("--p-range", p_range, "start:stop:step");

    // deriv
    auto* deriv = app.add_subcommand("deriv", "First or second derivative of L at p");
    SpecInput deriv_in;
    deriv_in.add_to(deriv);
    double deriv_p = 0.0;
    int order = 2;
    bool verbose = false;
    deriv->add_option("-p", deriv_p, "Exponent")->required();
    deriv->add_option("--order", order, "1 or 2")->check(CLI::IsMember({1, 2}));
    deriv->add_flag("-v,--verbose", verbose, "Also print the finite-difference oracle");

    // inflect
    auto* inflect = app.add_subcommand("inflect", "Locate all inflection points");
    SpecInput inflect_in;
    inflect_in.add_to(inflect);
    scan.add_to(inflect);

    // bound
    auto* bound = app.add_subcommand("bound", "Upper bound on the inflection count");
    std::int64_t bound_n = 0;
    bound->add_option("n,-n", bound_n, "Number of values")->required();

    // search
    auto* search = app.add_subcommand("search", "Randomized hunt for multi-inflection instances");
    SearchConfig search_cfg;
    std::string dist, pin;
    ScanFlags search_scan;
    search->add_option("-n", search_cfg.n, "Number of values per instance");
    search->add_option("--trials", search_cfg.trials, "Number of random instances");
    search->add_option("--min-roots", search_cfg.min_roots, "Minimum root count for a hit");
    search->add_option("--dist", dist, "log-uniform:lo:hi or cluster:center:spread:outlier_lo:outlier_hi");
    search->add_option("--pin", pin, "Replay exactly these comma-separated values");
    search->add_option("--threads", search_cfg.threads, "Worker threads");
    search_scan.add_to(search);

    // verify
    auto* verify = app.add_subcommand("verify", "Run the randomized property checks");
    std::string scope = "all";
    std::int64_t samples = 500;
    verify->add_option("--scope", scope, "all, monotonicity, means, calculus, n2, n3, parity, bound, figures");
    verify->add_option("--samples", samples, "Random samples per property");

    // figure-data
    auto* figure = app.add_subcommand("figure-data", "Emit curve data for figures 1-3");
    int figure_id = 0;
    figure->add_option("figure,--figure", figure_id, "1, 2 or 3")->required();

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kSuccess;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kSuccess;
    } catch (const CLI::ParseError& e) {
      err_ << "error: " << e.what() << "\n";
      return kUsage;
    }
    parse_precision_mode(globals_.precision, globals_.mode);

    try {
      if (*eval) return cmd_eval(spec_in.build(), p_point, p_range);
      if (*deriv) return cmd_deriv(deriv_in.build(), deriv_p, order, verbose);
      if (*inflect) return cmd_inflect(inflect_in.build(), scan.config);
      if (*bound) return cmd_bound(bound_n);
      if (*search) {
        search_cfg.scan = search_scan.config;
        search_cfg.scan.precision = globals_.mode;
        search_cfg.seed = globals_.seed.value_or(0);
        return cmd_search(search_cfg, dist, pin);
      }
      if (*verify) return cmd_verify(scope, samples);
      if (*figure) return cmd_figure_data(figure_id);
    } catch (const usage_error& e) {
      err_ << "usage error: " << e.what() << "\n";
      return kUsage;
    } catch (const no_inflection_error& e) {
      err_ << "error: " << e.what() << "\n";
      return kDomain;
    } catch (const error& e) {
      err_ << "error: " << e.what() << "\n";
      return kDomain;
    } catch (const std::exception& e) {
      err_ << "error: " << e.what() << "\n";
      return kUsage;
    }
    return kUsage;
  }

 private:
  OutputRecord record(std::string command, const MeanSpec* spec = nullptr) const {
    OutputRecord r;
    r.command = std::move(command);
    if (spec) r.inputs["spec"] = to_json(*spec);
    r.inputs["precision"] = globals_.precision;
    if (globals_.seed) r.inputs["seed"] = *globals_.seed;
    if (globals_.timestamp) r.timestamp = utc_timestamp();
    return r;
  }

  /// Sends text to --output when given, otherwise to the output stream.
  void emit(const std::string& text) {
    if (globals_.output.empty()) {
      out_ << text;
      return;
    }
    std::ofstream file(globals_.output, std::ios::binary);
    if (!file) throw usage_error("cannot write " + globals_.output);
    file << text;
  }

  void emit(const OutputRecord& r) { emit(r.render()); }

  int cmd_eval(const MeanSpec& spec, std::optional<double> p, const std::string& range) {
    std::vector<double> ps;
    if (p && !range.empty()) throw usage_error("give either -p or --p-range");
    if (p) {
      ps.push_back(*p);
    } else if (!range.empty()) {
      std::vector<double> parts;
      std::string item;
      std::istringstream in(range);
      while (std::getline(in, item, ':')) parts.push_back(parse_double(item));
      if (parts.size() != 3 || !(parts[2] > 0.0) || parts[1] < parts[0])
        throw usage_error("--p-range must be start:stop:step with step > 0 and stop >= start");
      const auto count = static_cast<std::int64_t>(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
      for (std::int64_t k = 0; k < count; ++k) ps.push_back(parts[0] + static_cast<double>(k) * parts[2]);
    } else {
      throw usage_error("-p or --p-range is required");
    }

    std::vector<MeanValue> rows;
    for (double q : ps) rows.push_back(lehmer(spec, q));
    if (globals_.json_output) {
      auto r = record("eval", &spec);
      if (!range.empty()) r.inputs["p_range"] = range;
      r.results["precision"] = "standard";
      r.results["rows"] = json::array();
      for (const auto& mv : rows) r.results["rows"].push_back({{"p", mv.p}, {"L", mv.value}});
      emit(r);
    } else {
      std::string text = "p,L\n";
      for (const auto& mv : rows) text += fmt9(mv.p) + "," + fmt9(mv.value) + "\n";
      emit(text);
    }
    return kSuccess;
  }

  int cmd_deriv(const MeanSpec& spec, double p, int order, bool verbose) {
    double value = 0.0, fd = 0.0;
    precision_mode used = precision_mode::standard;
    if (order == 1) {
      value = first_derivative(spec, p);
      const detail::kernel<extended_real> ker(spec);
      const extended_real h(1e-5), rp(p);
      fd = to_double(extended_real((ker.mean(rp + h) - ker.mean(rp - h)) / (2 * h)));
    } else {
      const auto s = second_derivative_sample(spec, p, globals_.mode);
      value = s.value;
      used = s.used;
      fd = fd_second_derivative(spec, p);
    }
    if (globals_.json_output) {
      auto r = record("deriv", &spec);
      r.inputs["p"] = p;
      r.inputs["order"] = order;
      r.results["value"] = value;
      r.results["precision"] = std::string(to_string(used));
      if (verbose) r.results["finite_difference"] = fd;
      emit(r);
    } else {
      std::string text = (order == 1 ? "L'(" : "L''(") + fmt9(p) + ") = " + fmt9(value) + "\n";
      if (verbose) text += "finite difference = " + fmt9(fd) + "\n";
      emit(text);
    }
    return kSuccess;
  }

  std::string render_report(const MeanSpec& spec, const InflectionReport& report) const {
    std::string text = "roots: " + std::to_string(report.count()) + "\n";
    for (const auto& root : report.roots) {
      text += "  p*=" + fmt9(root.p_star) + " bracket=[" + fmt9(root.bracket_lo) + ", " + fmt9(root.bracket_hi) +
              "] residual=" + fmt9(root.residual) + " " + std::string(to_string(root.direction)) +
              (root.merged ? " (merged)" : "") + "\n";
    }
    text += std::string("parity: ") + (report.parity_ok ? "odd" : "EVEN") + "\n";
    text += "bound J: " + std::to_string(report.bound_j) + "\n";
    text += "scan range: [" + fmt9(report.scan_lo) + ", " + fmt9(report.scan_hi) + "]\n";
    text += "precision: " + std::string(to_string(report.precision_used)) + "\n";
    if (spec.size() == 3 && spec.unit_weights())
      text += "side: " + std::string(to_string(classify_n3_side(spec))) + " (K=" + fmt9(k_constant(spec).k) + ")\n";
    for (const auto& w : report.warnings) text += "warning: " + w + "\n";
    return text;
  }

  int cmd_inflect(const MeanSpec& spec, ScanConfig config) {
    config.precision = globals_.mode;
    InflectionReport report;
    int code = kSuccess;
    std::string message;
    try {
      report = find_inflections(spec, config);
    } catch (const range_exhausted_error& e) {
      report = e.partial();
      code = kRangeExhausted;
      message = e.what();
    }
    if (globals_.json_output) {
      auto r = record("inflect", &spec);
      r.results = to_json(report);
      if (spec.size() == 3 && spec.unit_weights()) {
        r.results["side"] = std::string(to_string(classify_n3_side(spec)));
        r.results["k"] = k_constant(spec).k;
      }
      r.diagnostics = report.warnings;
      if (code != kSuccess) r.diagnostics.push_back("range exhausted: " + message);
      emit(r);
    } else {
      emit(render_report(spec, report));
    }
    if (code != kSuccess) err_ << "error: " << message << "\n";
    return code;
  }

  int cmd_bound(std::int64_t n) {
    const auto b = count_bound(n);
    if (globals_.json_output) {
      auto r = record("bound");
      r.inputs["n"] = n;
      r.results["j"] = b.j;
      r.results["n_terms"] = b.n_terms;
      r.results["precision"] = "exact";
      emit(r);
    } else {
      emit("J=" + std::to_string(b.j) + " N=" + std::to_string(b.n_terms) + "\n");
    }
    return kSuccess;
  }

  static ValueDistribution parse_distribution(const std::string& text) {
    if (text.empty()) return Cluster{};
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ':')) parts.push_back(item);
    if (parts[0] == "log-uniform" && parts.size() == 3)
      return LogUniform{parse_double(parts[1]), parse_double(parts[2])};
    if (parts[0] == "cluster" && parts.size() == 5)
      return Cluster{parse_double(parts[1]), parse_double(parts[2]), parse_double(parts[3]), parse_double(parts[4])};
    throw usage_error("unknown distribution: " + text);
  }

  int cmd_search(SearchConfig config, const std::string& dist, const std::string& pin) {
    if (!pin.empty()) {
      if (!dist.empty()) throw usage_error("give either --dist or --pin");
      config.distribution = Pinned{parse_list(pin)};
      config.n = static_cast<int>(std::get<Pinned>(config.distribution).values.size());
      config.trials = 1;
    } else {
      config.distribution = parse_distribution(dist);
    }
    const auto outcome = run_search(config);
    const std::string summary = "trials=" + std::to_string(outcome.trials) +
                                " hits=" + std::to_string(outcome.hits.size()) +
                                " best_root_count=" + std::to_string(outcome.best_root_count) +
                                " exhausted=" + std::to_string(outcome.exhausted);
    if (globals_.json_output) {
      auto r = record("search");
      r.inputs["n"] = config.n;
      r.inputs["trials"] = config.trials;
      r.inputs["seed"] = config.seed;
      r.inputs["min_roots"] = config.min_roots;
      r.inputs["distribution"] = pin.empty() ? (dist.empty() ? "cluster:1.025:0.002:0.9:0.99" : dist) : "pinned";
      r.results["precision"] = std::string(to_string(config.scan.precision));
      r.results["trials"] = outcome.trials;
      r.results["hit_count"] = outcome.hits.size();
      r.results["best_root_count"] = outcome.best_root_count;
      r.results["exhausted"] = outcome.exhausted;
      r.results["hits"] = json::array();
      for (const auto& hit : outcome.hits) r.results["hits"].push_back(to_json(hit));
      emit(r);
      err_ << summary << "\n";
    } else {
      std::string text = summary + "\n";
      for (const auto& hit : outcome.hits) {
        text += "trial " + std::to_string(hit.trial_index) + ": x={";
        for (std::size_t i = 0; i < hit.spec.size(); ++i)
          text += (i ? "," : "") + fmt9(hit.spec.values()[i]);
        text += "} roots:";
        for (const auto& root : hit.report.roots) text += " " + fmt9(root.p_star);
        text += "\n";
      }
      emit(text);
    }
    return kSuccess;
  }

  int cmd_verify(const std::string& scope, std::int64_t samples) {
    if (samples < 1) throw usage_error("--samples must be positive");
    VerifyOptions options;
    options.seed = globals_.seed.value_or(42);
    options.samples = samples;
    const auto results = run_verification(scope, options);
    bool ok = true;
    for (const auto& c : results) ok = ok && c.passed;
    if (globals_.json_output) {
      auto r = record("verify");
      r.inputs["scope"] = scope;
      r.inputs["samples"] = samples;
      r.inputs["seed"] = options.seed;
      r.results["precision"] = std::string(to_string(globals_.mode));
      r.results["passed"] = ok;
      r.results["checks"] = json::array();
      for (const auto& c : results) r.results["checks"].push_back(to_json(c));
      emit(r);
    } else {
      std::string text = "seed: " + std::to_string(options.seed) + "\n";
      for (const auto& c : results) {
        if (c.passed)
          text += "PASS " + c.name + " (" + std::to_string(c.samples) + " samples)\n";
        else
          text += "FAIL " + c.name + " at sample " + std::to_string(c.samples) + ": " + c.detail + "\n";
      }
      text += ok ? "all checks passed\n" : "verification FAILED\n";
      emit(text);
    }
    return ok ? kSuccess : kVerificationFailed;
  }

  struct CurveTable {
    std::string name;
    std::string csv;
    json rows = json::array();
  };

  /// Rows of (p, L, L'') over [lo, hi] with the refined roots inserted and marked.
  static CurveTable curve_table(const std::string& name, const MeanSpec& spec, double lo, double hi, double step,
                                const std::vector<double>& roots) {
    CurveTable t{name, "p,L,d2L,root\n"};
    std::vector<std::pair<double, bool>> ps;
    const auto count = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9));
    for (std::int64_t k = 0; k <= count; ++k) ps.emplace_back(lo + static_cast<double>(k) * step, false);
    for (double r : roots)
      if (r >= lo && r <= hi) ps.emplace_back(r, true);
    std::stable_sort(ps.begin(), ps.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [p, is_root] : ps) {
      const double l = lehmer(spec, p).value, d2 = second_derivative(spec, p);
      t.csv += fmt9(p) + "," + fmt9(l) + "," + fmt9(d2) + "," + (is_root ? "1" : "0") + "\n";
      t.rows.push_back({{"p", p}, {"L", l}, {"d2L", d2}, {"root", is_root}});
    }
    return t;
  }

  int cmd_figure_data(int id) {
    std::vector<CurveTable> tables;
    MeanSpec spec = make_spec({0.5, 2.5});
    if (id == 1) {
      const auto report = find_inflections(spec);
      std::vector<double> roots;
      for (const auto& r : report.roots) roots.push_back(r.p_star);
      tables.push_back(curve_table("figure1", spec, -4.0, 5.0, 0.01, roots));
    } else if (id == 2) {
      spec = make_spec({1.0, 2.0, 3.0});
      const auto report = find_inflections(spec);
      std::vector<double> roots;
      for (const auto& r : report.roots) roots.push_back(r.p_star);
      tables.push_back(curve_table("figure2", spec, -10.0, 10.0, 0.01, roots));
      CurveTable tilde{"figure2_tilde", "p,tilde_l,root\n"};
      std::vector<std::pair<double, bool>> ps;
      for (std::int64_t k = 0; k <= 600; ++k) ps.emplace_back(-2.0 + 0.01 * static_cast<double>(k), false);
      for (double r : roots) ps.emplace_back(r, true);
      std::stable_sort(ps.begin(), ps.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [p, is_root] : ps) {
        const double v = tilde_l(spec, p);
        tilde.csv += fmt9(p) + "," + fmt9(v) + "," + (is_root ? "1" : "0") + "\n";
        tilde.rows.push_back({{"p", p}, {"tilde_l", v}, {"root", is_root}});
      }
      tables.push_back(std::move(tilde));
    } else if (id == 3) {
      spec = make_spec({1.0259, 1.0241, 1.0244, 0.96});
      const auto report = find_inflections(spec);
      std::vector<double> roots;
      for (const auto& r : report.roots) roots.push_back(r.p_star);
      tables.push_back(curve_table("figure3", spec, -500.0, 2500.0, 0.5, roots));
    } else {
      throw usage_error("unknown figure id " + std::to_string(id) + " (expected 1, 2 or 3)");
    }

    if (globals_.json_output) {
      auto r = record("figure-data", &spec);
      r.inputs["figure"] = id;
      r.results["precision"] = std::string(to_string(globals_.mode));
      for (const auto& t : tables) r.results[t.name] = t.rows;
      emit(r);
      return kSuccess;
    }
    if (!globals_.output.empty()) {
      std::filesystem::create_directories(globals_.output);
      for (const auto& t : tables) {
        const auto path = std::filesystem::path(globals_.output) / (t.name + ".csv");
        std::ofstream file(path, std::ios::binary);
        if (!file) throw usage_error("cannot write " + path.string());
        file << t.csv;
        out_ << path.string() << "\n";
      }
      return kSuccess;
    }
    for (std::size_t i = 0; i < tables.size(); ++i) out_ << (i ? "\n" : "") << tables[i].csv;
    return kSuccess;
  }

  std::ostream& out_;
  std::ostream& err_;
  GlobalFlags globals_;
};

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return Runner(out, err).run(argc, argv);
}

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"lehmer"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lehmer_mean::cli
